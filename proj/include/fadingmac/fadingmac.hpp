// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "fadingmac/errors.hpp"
#include "fadingmac/fading.hpp"
#include "fadingmac/harness.hpp"
#include "fadingmac/look.hpp"
#include "fadingmac/mac.hpp"
#include "fadingmac/nonident.hpp"
#include "fadingmac/partial_csi.hpp"
#include "fadingmac/ratesplit.hpp"
#include "fadingmac/rng.hpp"
#include "fadingmac/strategies.hpp"
#include "fadingmac/waterfill.hpp"
