#ifndef VARSAMP_VARSAMP_HPP
#define VARSAMP_VARSAMP_HPP

#include "kernels.hpp"
#include "numerics.hpp"
#include "operators.hpp"
#include "parallel.hpp"
#include "registry.hpp"
#include "signals.hpp"
#include "variation.hpp"

#endif  // VARSAMP_VARSAMP_HPP
