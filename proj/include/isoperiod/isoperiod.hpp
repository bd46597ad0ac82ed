#pragma once

// Umbrella header.

#include "csv.hpp"
#include "error.hpp"
#include "experiments.hpp"
#include "integrate.hpp"
#include "lotka_volterra.hpp"
#include "oracle_1d.hpp"
#include "parallel.hpp"
#include "period.hpp"
#include "phase_point.hpp"
#include "polynomial.hpp"
#include "rng.hpp"
#include "sampling.hpp"
#include "semiclassical.hpp"
#include "serialization.hpp"
#include "survey.hpp"
#include "systems.hpp"
#include "trajectory.hpp"
#include "trajectory_csv.hpp"
#include "tridiagonal.hpp"
