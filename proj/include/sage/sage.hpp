#pragma once

#include "sage/error.hpp"
#include "sage/grid.hpp"
#include "sage/map_ops.hpp"
#include "sage/smap_io.hpp"
#include "sage/png.hpp"
#include "sage/groundtruth.hpp"
#include "sage/clip.hpp"
#include "sage/fusion.hpp"
#include "sage/providers.hpp"
#include "sage/metrics.hpp"
#include "sage/manifest.hpp"
#include "sage/synth.hpp"
#include "sage/harness.hpp"
