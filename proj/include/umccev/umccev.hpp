#pragma once

#include "umccev/clustering.hpp"
#include "umccev/commands.hpp"
#include "umccev/datasets.hpp"
#include "umccev/errors.hpp"
#include "umccev/graphs.hpp"
#include "umccev/metrics.hpp"
#include "umccev/operators.hpp"
#include "umccev/solver.hpp"
