#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>
#include <algorithm>

#include "error.hpp"

namespace isoperiod {

/// Real polynomial in one variable, coefficients indexed by power.
/// Parsed from a small expression language: decimal literals, one
/// variable letter, `^` with integer exponent, `*`, `+`, `-`.
/// Juxtaposition multiplies ("2y^2" == "2*y^2").
class Polynomial {
public:
    Polynomial() : coef_{0.0} {}
    explicit Polynomial(std::vector<double> coef) : coef_(std::move(coef)) { trim(); }

    static Polynomial parse(std::string_view text);

    double operator()(double x) const {
        double acc = 0.0;
        for (auto it = coef_.rbegin(); it != coef_.rend(); ++it) acc = acc * x + *it;
        return acc;
    }

    Polynomial derivative() const {
        if (coef_.size() <= 1) return Polynomial();
        std::vector<double> d(coef_.size() - 1);
        for (std::size_t i = 1; i < coef_.size(); ++i) d[i - 1] = double(i) * coef_[i];
        return Polynomial(std::move(d));
    }

    int degree() const { return int(coef_.size()) - 1; }
    const std::vector<double>& coefficients() const { return coef_; }
    const std::string& source() const { return source_; }

    /// Canonical text form, e.g. "0.5*x^2 + 1".
    std::string to_string(char var = 'x') const {
        std::ostringstream os;
        os.precision(17);
        bool first = true;
        for (int i = degree(); i >= 0; --i) {
            double c = coef_[std::size_t(i)];
            if (c == 0.0 && !(i == 0 && first)) continue;
            if (!first) os << (c < 0 ? " - " : " + ");
            else if (c < 0) os << "-";
            double a = std::abs(c);
            if (i == 0) os << a;
            else {
                if (a != 1.0) os << a << "*";
                os << var;
                if (i > 1) os << "^" << i;
            }
            first = false;
        }
        return os.str();
    }

    Polynomial operator+(const Polynomial& o) const {
        std::vector<double> r(std::max(coef_.size(), o.coef_.size()), 0.0);
        for (std::size_t i = 0; i < coef_.size(); ++i) r[i] += coef_[i];
        for (std::size_t i = 0; i < o.coef_.size(); ++i) r[i] += o.coef_[i];
        return Polynomial(std::move(r));
    }
    Polynomial operator*(const Polynomial& o) const {
        std::vector<double> r(coef_.size() + o.coef_.size() - 1, 0.0);
        for (std::size_t i = 0; i < coef_.size(); ++i)
            for (std::size_t j = 0; j < o.coef_.size(); ++j) r[i + j] += coef_[i] * o.coef_[j];
        return Polynomial(std::move(r));
    }
    Polynomial scaled(double s) const {
        auto r = coef_;
        for (auto& c : r) c *= s;
        return Polynomial(std::move(r));
    }

private:
    void trim() {
        while (coef_.size() > 1 && coef_.back() == 0.0) coef_.pop_back();
        if (coef_.empty()) coef_.push_back(0.0);
    }

    std::vector<double> coef_;
    std::string source_;

    friend class PolynomialParser;
};

class PolynomialParser {
public:
    explicit PolynomialParser(std::string_view s) : src_(s) {}

    Polynomial run() {
        skip();
        if (pos_ >= src_.size()) fail("empty expression");
        Polynomial acc = term_with_sign();
        skip();
        while (pos_ < src_.size()) {
            char op = src_[pos_];
            if (op != '+' && op != '-') fail("expected '+' or '-'");
            Polynomial t = term_with_sign();
            acc = acc + t;
            skip();
        }
        acc.source_ = std::string(src_);
        return acc;
    }

private:
    void skip() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    [[noreturn]] void fail(const std::string& why) const {
        throw ConfigError("potential '" + std::string(src_) + "': " + why + " at offset " +
                          std::to_string(pos_));
    }

    Polynomial term_with_sign() {
        skip();
        double sign = 1.0;
        while (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) {
            if (src_[pos_] == '-') sign = -sign;
            ++pos_;
            skip();
        }
        return term().scaled(sign);
    }

    Polynomial term() {
        Polynomial acc({1.0});
        bool any = false;
        for (;;) {
            skip();
            if (pos_ >= src_.size()) break;
            char ch = src_[pos_];
            if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') {
                acc = acc * Polynomial({number()});
            } else if (std::isalpha(static_cast<unsigned char>(ch))) {
                acc = acc * power();
            } else if (ch == '*' && any) {
                ++pos_;
                skip();
                if (pos_ >= src_.size()) fail("dangling '*'");
                continue;
            } else {
                break;
            }
            any = true;
        }
        if (!any) fail("expected a number or variable");
        return acc;
    }

    double number() {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
            ++pos_;
        // exponent notation, e.g. 1e-3
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E') && pos_ + 1 < src_.size() &&
            (std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])) || src_[pos_ + 1] == '-' ||
             src_[pos_ + 1] == '+')) {
            ++pos_;
            if (src_[pos_] == '-' || src_[pos_] == '+') ++pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        }
        double v = 0.0;
        auto res = std::from_chars(src_.data() + start, src_.data() + pos_, v);
        if (res.ec != std::errc() || res.ptr != src_.data() + pos_) fail("bad number");
        return v;
    }

    Polynomial power() {
        char v = src_[pos_++];
        if (var_ == 0) var_ = v;
        else if (v != var_) fail(std::string("second variable '") + v + "'");
        skip();
        std::size_t exp = 1;
        if (pos_ < src_.size() && src_[pos_] == '^') {
            ++pos_;
            skip();
            std::size_t start = pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            if (start == pos_) fail("expected integer exponent");
            auto res = std::from_chars(src_.data() + start, src_.data() + pos_, exp);
            if (res.ec != std::errc() || exp > 64) fail("exponent out of range");
        }
        std::vector<double> c(exp + 1, 0.0);
        c[exp] = 1.0;
        return Polynomial(std::move(c));
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    char var_ = 0;
};

inline Polynomial Polynomial::parse(std::string_view text) { return PolynomialParser(text).run(); }

struct Minimum {
    double x;
    double value;
};

/// Global minimum of V on [lo, hi]: dense scan, then golden-section
/// refinement around the best sample.
inline Minimum minimize_on(const Polynomial& V, double lo, double hi, int samples = 4000) {
    double best_x = lo, best_v = V(lo);
    const double dx = (hi - lo) / samples;
    int best_i = 0;
    for (int i = 1; i <= samples; ++i) {
        double x = (i == samples) ? hi : lo + i * dx;
        double v = V(x);
        if (v < best_v) {
            best_v = v;
            best_x = x;
            best_i = i;
        }
    }
    double a = lo + std::max(0, best_i - 1) * dx;
    double b = std::min(hi, lo + (best_i + 1) * dx);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = V(c), fd = V(d);
    for (int it = 0; it < 200 && (b - a) > 1e-15 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = V(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = V(d);
        }
    }
    double x = 0.5 * (a + b);
    if (V(x) < best_v) return {x, V(x)};
    return {best_x, best_v};
}

}  // namespace isoperiod
