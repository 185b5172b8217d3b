/*
 * Copyright 2026 The colorkeep Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include "colorkeep/affine_transfer.hpp"
#include "colorkeep/codec.hpp"
#include "colorkeep/colorstats.hpp"
#include "colorkeep/error.hpp"
#include "colorkeep/image.hpp"
#include "colorkeep/linalg3.hpp"
#include "colorkeep/luminance.hpp"
#include "colorkeep/parallel.hpp"
#include "colorkeep/pipeline.hpp"
#include "colorkeep/styler.hpp"
