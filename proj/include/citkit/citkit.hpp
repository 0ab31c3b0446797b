// Umbrella header for the citkit combinatorial interaction testing toolkit.
#pragma once

#include "citkit/analyze.hpp"
#include "citkit/cli.hpp"
#include "citkit/coverage.hpp"
#include "citkit/generator.hpp"
#include "citkit/model.hpp"
#include "citkit/plan.hpp"
#include "citkit/runner.hpp"
#include "citkit/synth.hpp"
#include "citkit/tuples.hpp"
