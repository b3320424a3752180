#pragma once

#include <bsheet/analytics.hpp>
#include <bsheet/error.hpp>
#include <bsheet/hitting.hpp>
#include <bsheet/majorant.hpp>
#include <bsheet/montecarlo.hpp>
#include <bsheet/rng.hpp>
#include <bsheet/sheet.hpp>
#include <bsheet/special.hpp>
#include <bsheet/stats.hpp>

namespace bsheet {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace bsheet
