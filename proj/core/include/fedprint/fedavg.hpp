#pragma once

#include "fedprint/fedavg/aggregate.hpp"
#include "fedprint/fedavg/federation.hpp"
#include "fedprint/fedavg/session.hpp"
#include "fedprint/fedavg/transport.hpp"
#include "fedprint/fedavg/wire.hpp"
