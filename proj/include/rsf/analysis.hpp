#pragma once

#include "rsf/analysis/ami.hpp"
#include "rsf/analysis/chamfer.hpp"
#include "rsf/analysis/export.hpp"
#include "rsf/analysis/kmeans.hpp"
#include "rsf/analysis/tsne.hpp"
