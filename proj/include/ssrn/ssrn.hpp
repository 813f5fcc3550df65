#pragma once

// Umbrella header for the saliency score regression toolkit.

#include "ssrn/data.hpp"
#include "ssrn/error.hpp"
#include "ssrn/layers.hpp"
#include "ssrn/loss.hpp"
#include "ssrn/metrics.hpp"
#include "ssrn/modelio.hpp"
#include "ssrn/network.hpp"
#include "ssrn/optim.hpp"
#include "ssrn/pnm.hpp"
#include "ssrn/resize.hpp"
#include "ssrn/rng.hpp"
#include "ssrn/synthetic.hpp"
#include "ssrn/tensor.hpp"
