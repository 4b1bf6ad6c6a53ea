#pragma once

#include "tfpg/benchmarks.hpp"
#include "tfpg/errors.hpp"
#include "tfpg/fem_space.hpp"
#include "tfpg/frac_ode.hpp"
#include "tfpg/frac_time.hpp"
#include "tfpg/quadrature.hpp"
#include "tfpg/spacetime.hpp"
#include "tfpg/special_fn.hpp"
#include "tfpg/study.hpp"
#include "tfpg/temporal_mesh.hpp"
#include "tfpg/time_gram.hpp"
#include "tfpg/time_source.hpp"
