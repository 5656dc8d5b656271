// Copyright 2026 The NeSHFS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "neshfs/commands.hpp"
#include "neshfs/config.hpp"
#include "neshfs/csv.hpp"
#include "neshfs/dataset.hpp"
#include "neshfs/early_stopping.hpp"
#include "neshfs/error.hpp"
#include "neshfs/evaluator.hpp"
#include "neshfs/ga.hpp"
#include "neshfs/ledger.hpp"
#include "neshfs/metrics.hpp"
#include "neshfs/model.hpp"
#include "neshfs/parallel.hpp"
#include "neshfs/random.hpp"
#include "neshfs/report.hpp"
#include "neshfs/scoring.hpp"
#include "neshfs/search.hpp"
#include "neshfs/subset.hpp"
