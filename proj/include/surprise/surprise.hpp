#pragma once

#include "surprise/causal.hpp"
#include "surprise/core.hpp"
#include "surprise/divergence.hpp"
#include "surprise/engine.hpp"
#include "surprise/error.hpp"
#include "surprise/estimators.hpp"
#include "surprise/memory.hpp"
#include "surprise/serialization.hpp"
#include "surprise/simgen.hpp"
#include "surprise/stream_io.hpp"
