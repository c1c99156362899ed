#pragma once

#include "fedprint/harness/experiment.hpp"
#include "fedprint/harness/report.hpp"
#include "fedprint/harness/results.hpp"
#include "fedprint/harness/runner.hpp"
