/**
 * Copyright 2026 The wbed Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef WBED_WBED_HPP_
#define WBED_WBED_HPP_

#include "wbed/cam.hpp"
#include "wbed/error.hpp"
#include "wbed/experiments.hpp"
#include "wbed/fusion.hpp"
#include "wbed/io.hpp"
#include "wbed/metrics.hpp"
#include "wbed/parallel.hpp"
#include "wbed/types.hpp"

#endif  // WBED_WBED_HPP_
