#pragma once

#include "fedprint/nn/adam.hpp"
#include "fedprint/nn/arch.hpp"
#include "fedprint/nn/checkpoint.hpp"
#include "fedprint/nn/layers.hpp"
#include "fedprint/nn/model.hpp"
#include "fedprint/nn/network.hpp"
#include "fedprint/nn/trainer.hpp"
