#pragma once

// Umbrella header for the measurement library (everything except the HTTP front end).

#include "ccd/error.hpp"
#include "ccd/eval.hpp"
#include "ccd/geometry.hpp"
#include "ccd/heatmap.hpp"
#include "ccd/line.hpp"
#include "ccd/manifest.hpp"
#include "ccd/robust_fit.hpp"
#include "ccd/service.hpp"
#include "ccd/synth.hpp"
#include "ccd/voice_fsm.hpp"
