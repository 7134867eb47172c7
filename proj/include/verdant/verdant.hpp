#pragma once

// Umbrella header for the crop-health pipeline.

#include "baseline.hpp"
#include "dataset.hpp"
#include "errors.hpp"
#include "hypercube.hpp"
#include "indices.hpp"
#include "net.hpp"
#include "render.hpp"
#include "rng.hpp"
#include "stats.hpp"
#include "temporal.hpp"
#include "train.hpp"
