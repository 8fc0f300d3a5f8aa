#pragma once

#include "combinatorics.hpp"
#include "continuous.hpp"
#include "divergences.hpp"
#include "domain.hpp"
#include "error.hpp"
#include "estimators.hpp"
#include "exact_verifier.hpp"
#include "loss_compiler.hpp"
#include "numeric.hpp"
#include "sampling.hpp"
