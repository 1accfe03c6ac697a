#pragma once

#include "wordswap/analysis.hpp"
#include "wordswap/annotation.hpp"
#include "wordswap/baselines.hpp"
#include "wordswap/challenge.hpp"
#include "wordswap/config.hpp"
#include "wordswap/corpus.hpp"
#include "wordswap/factors.hpp"
#include "wordswap/predictions.hpp"
#include "wordswap/stats.hpp"
#include "wordswap/transform.hpp"
#include "wordswap/util.hpp"
