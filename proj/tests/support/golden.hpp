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

// Values frozen from the first verified run of the seed-42 reference
// scenario: each detector evaluated alone, then the three fused with
// mAP-proportional weights (IoU 0.7, floor 0.001) and evaluated.

#pragma once

#include <cstddef>

namespace detens::golden {

inline constexpr double kMapLossReweighting = 0.38888296023865088;
inline constexpr double kMapTransferLearning = 0.44973421220653542;
inline constexpr double kMapWeightedSampler = 0.41686748282967939;
inline constexpr double kMapEnsemble = 0.69732004098081168;
inline constexpr std::size_t kFusedDetections = 8055;

}  // namespace detens::golden
