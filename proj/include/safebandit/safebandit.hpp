#pragma once

#include "budget.hpp"
#include "confidence.hpp"
#include "detector.hpp"
#include "environment.hpp"
#include "harness.hpp"
#include "policies.hpp"
#include "presets.hpp"
#include "rng.hpp"
#include "separation.hpp"
#include "theory.hpp"
