#pragma once

// Umbrella header for the ReconVAT semi-supervised transcription toolkit.

#include "audio.hpp"
#include "autodiff.hpp"
#include "config.hpp"
#include "datasets.hpp"
#include "inference.hpp"
#include "labels.hpp"
#include "metrics.hpp"
#include "model.hpp"
#include "plot.hpp"
#include "training.hpp"
#include "vat.hpp"
