#pragma once

#include "tubalcast/tensor3.hpp"

namespace tubalcast::traffic {

/// Mean of |pred - truth| over all entries.
double mae(const Tensor3& pred, const Tensor3& truth);
/// ||pred - truth||_F / ||truth||_F; ZeroTruth when truth is all zero.
double nrmse(const Tensor3& pred, const Tensor3& truth);

}  // namespace tubalcast::traffic
