#pragma once

// Umbrella header.
#include "textloc/color.hpp"
#include "textloc/error.hpp"
#include "textloc/evaluation.hpp"
#include "textloc/image.hpp"
#include "textloc/keyframe.hpp"
#include "textloc/media_io.hpp"
#include "textloc/pipeline.hpp"
#include "textloc/region_filter.hpp"
#include "textloc/saliency.hpp"
#include "textloc/shot_detector.hpp"
#include "textloc/synthetic_corpus.hpp"
#include "textloc/wavelet.hpp"
