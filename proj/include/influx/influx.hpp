/*
 * Copyright 2026 The Influx Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include "influx/analysis.hpp"
#include "influx/calibration.hpp"
#include "influx/dataset.hpp"
#include "influx/diversity.hpp"
#include "influx/error.hpp"
#include "influx/info_metrics.hpp"
#include "influx/numeric.hpp"
#include "influx/synthetic.hpp"
#include "influx/text_metrics.hpp"
