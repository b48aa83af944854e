#pragma once

#include "cbo/analysis.hpp"
#include "cbo/assignment.hpp"
#include "cbo/constants.hpp"
#include "cbo/coupling.hpp"
#include "cbo/dynamics.hpp"
#include "cbo/error.hpp"
#include "cbo/experiments/config.hpp"
#include "cbo/experiments/result.hpp"
#include "cbo/experiments/runners.hpp"
#include "cbo/laws.hpp"
#include "cbo/matrix.hpp"
#include "cbo/objectives.hpp"
#include "cbo/rng.hpp"
#include "cbo/version.hpp"
