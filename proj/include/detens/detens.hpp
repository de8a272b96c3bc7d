/* Copyright 2026 The detens Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include "detens/box.hpp"
#include "detens/error.hpp"
#include "detens/io.hpp"
#include "detens/metrics.hpp"
#include "detens/synth.hpp"
#include "detens/types.hpp"
#include "detens/wbf.hpp"
#include "detens/weights.hpp"
