#pragma once

#include "subme/benchmark.hpp"
#include "subme/cost_model.hpp"
#include "subme/integer_me.hpp"
#include "subme/interpolation.hpp"
#include "subme/luma_plane.hpp"
#include "subme/mode_decision.hpp"
#include "subme/motion_vector.hpp"
#include "subme/stats.hpp"
#include "subme/subpel.hpp"
#include "subme/video_io.hpp"
