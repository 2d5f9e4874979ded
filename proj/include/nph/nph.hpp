#pragma once

#include "nph/bounds.hpp"
#include "nph/dynamics.hpp"
#include "nph/errors.hpp"
#include "nph/experiments.hpp"
#include "nph/io.hpp"
#include "nph/kernels.hpp"
#include "nph/layers.hpp"
#include "nph/masks.hpp"
#include "nph/patterns.hpp"
#include "nph/rng.hpp"
#include "nph/version.hpp"
