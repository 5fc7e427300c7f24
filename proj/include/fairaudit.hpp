//
// Copyright 2026 The fairaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef FAIRAUDIT_FAIRAUDIT_HPP_
#define FAIRAUDIT_FAIRAUDIT_HPP_

#include "fairaudit/allocation.hpp"
#include "fairaudit/bounds.hpp"
#include "fairaudit/csv.hpp"
#include "fairaudit/datamodel.hpp"
#include "fairaudit/dataset.hpp"
#include "fairaudit/error.hpp"
#include "fairaudit/estimation.hpp"
#include "fairaudit/random.hpp"
#include "fairaudit/simulation.hpp"

#endif  // FAIRAUDIT_FAIRAUDIT_HPP_
