#pragma once

#include "trapsift/backend.hpp"
#include "trapsift/bench.hpp"
#include "trapsift/csv.hpp"
#include "trapsift/dnn_backend.hpp"
#include "trapsift/error.hpp"
#include "trapsift/filterpipe.hpp"
#include "trapsift/json_io.hpp"
#include "trapsift/manifest.hpp"
#include "trapsift/metrics.hpp"
#include "trapsift/plot.hpp"
#include "trapsift/preprocess.hpp"
#include "trapsift/registry.hpp"
#include "trapsift/rng.hpp"
#include "trapsift/scorestore.hpp"
#include "trapsift/splitgen.hpp"
#include "trapsift/watch.hpp"
