#pragma once

#include "fedprint/datapipe/corpus_io.hpp"
#include "fedprint/datapipe/slice.hpp"
#include "fedprint/datapipe/split.hpp"
