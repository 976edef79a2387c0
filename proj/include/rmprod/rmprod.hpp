// Everything in one include.
#pragma once

#include "core.hpp"
#include "invariant_measure.hpp"
#include "io.hpp"
#include "lyapunov.hpp"
#include "pade_stieltjes.hpp"
#include "quadrature.hpp"
#include "schrodinger.hpp"
#include "simulate.hpp"
#include "special_functions.hpp"
#include "tables.hpp"
#include "verify.hpp"
