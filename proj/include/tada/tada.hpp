#pragma once

// Umbrella header: operators, TAdaConv, blocks and cost models. The
// verification harness lives under tada/harness/ and is included separately.

#include "tada/baseline/equivalence.hpp"
#include "tada/baseline/temporal_ops.hpp"
#include "tada/blocks/aggregation.hpp"
#include "tada/blocks/netspec.hpp"
#include "tada/blocks/network.hpp"
#include "tada/core/errors.hpp"
#include "tada/core/ops.hpp"
#include "tada/core/random.hpp"
#include "tada/core/tape.hpp"
#include "tada/core/tensor.hpp"
#include "tada/cost/net_cost.hpp"
#include "tada/cost/op_cost.hpp"
#include "tada/cost/report.hpp"
#include "tada/tadaconv/calibration.hpp"
#include "tada/tadaconv/config.hpp"
#include "tada/tadaconv/tadaconv.hpp"
