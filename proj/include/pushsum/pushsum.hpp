#pragma once

#include "pushsum/augmented_matrix.hpp"
#include "pushsum/consensus.hpp"
#include "pushsum/contraction.hpp"
#include "pushsum/dual_averaging.hpp"
#include "pushsum/error.hpp"
#include "pushsum/failure_schedule.hpp"
#include "pushsum/graph.hpp"
#include "pushsum/harness.hpp"
#include "pushsum/io.hpp"
