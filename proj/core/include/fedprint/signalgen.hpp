#pragma once

#include "fedprint/signalgen/channel.hpp"
#include "fedprint/signalgen/impairments.hpp"
#include "fedprint/signalgen/profile.hpp"
#include "fedprint/signalgen/rn16.hpp"
#include "fedprint/signalgen/scenario.hpp"
#include "fedprint/signalgen/synthesize.hpp"
#include "fedprint/signalgen/types.hpp"
