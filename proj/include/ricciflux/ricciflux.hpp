#pragma once

#include "ricciflux/config.hpp"
#include "ricciflux/errors.hpp"
#include "ricciflux/linalg.hpp"
#include "ricciflux/geom_core.hpp"
#include "ricciflux/flux_tube.hpp"
#include "ricciflux/ricci_flow.hpp"
#include "ricciflux/dynamo.hpp"

namespace ricciflux {
inline constexpr const char* kVersion = "0.1.0";
}
