#pragma once

#include "rsf/nn/init.hpp"
#include "rsf/nn/layers.hpp"
#include "rsf/nn/loss.hpp"
#include "rsf/nn/matrix.hpp"
#include "rsf/nn/normalize.hpp"
#include "rsf/nn/rng.hpp"
