#pragma once

#include "fedprint/augment/augment.hpp"
