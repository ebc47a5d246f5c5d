// Copyright 2026 The urbangnss Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied. See the License for the specific language governing
// permissions and limitations under the License.

/// @file
/// Umbrella header.

#pragma once

#include "urbangnss/constants.hpp"
#include "urbangnss/geodesy.hpp"
#include "urbangnss/citymodel.hpp"
#include "urbangnss/raycast.hpp"
#include "urbangnss/satellites.hpp"
#include "urbangnss/channel.hpp"
#include "urbangnss/solver.hpp"
#include "urbangnss/scenario.hpp"
#include "urbangnss/heatmap.hpp"
#include "urbangnss/raycheck.hpp"
