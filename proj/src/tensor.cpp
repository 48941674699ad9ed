#include "comet/tensor.hpp"

// Tensor is header-only; this unit anchors the target.
