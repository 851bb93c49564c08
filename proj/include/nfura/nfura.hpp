// SPDX-License-Identifier: Apache-2.0
//
// nfura - near-field unsourced random access simulation toolkit
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef NFURA_HPP
#define NFURA_HPP

#include "array_geometry.hpp"
#include "core.hpp"
#include "harness.hpp"
#include "metrics.hpp"
#include "offgrid_refine.hpp"
#include "polar_dictionary.hpp"
#include "selftest.hpp"
#include "sparse_recovery.hpp"
#include "stitch_cluster.hpp"
#include "ura_codec.hpp"

#endif
