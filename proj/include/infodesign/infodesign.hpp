// Copyright 2026 The InfoDesign Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef INFODESIGN_INFODESIGN_HPP_
#define INFODESIGN_INFODESIGN_HPP_

#include "infodesign/cli.hpp"
#include "infodesign/core.hpp"
#include "infodesign/dynamics.hpp"
#include "infodesign/equilibrium.hpp"
#include "infodesign/fpa.hpp"
#include "infodesign/game.hpp"
#include "infodesign/goal_design.hpp"
#include "infodesign/io.hpp"
#include "infodesign/report.hpp"
#include "infodesign/valuation.hpp"

#endif  // INFODESIGN_INFODESIGN_HPP_
