// Copyright 2026 The ctxseg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Umbrella header for the ctxseg library.

#pragma once

#include "ctxseg/common.hpp"
#include "ctxseg/config.hpp"
#include "ctxseg/context_model.hpp"
#include "ctxseg/crf.hpp"
#include "ctxseg/evaluation.hpp"
#include "ctxseg/io.hpp"
#include "ctxseg/link_propagation.hpp"
#include "ctxseg/max_flow.hpp"
#include "ctxseg/pipeline.hpp"
#include "ctxseg/qpbo.hpp"
#include "ctxseg/region_store.hpp"
#include "ctxseg/rng.hpp"
#include "ctxseg/similarity_graph.hpp"
#include "ctxseg/sparse_matrix.hpp"
#include "ctxseg/synthetic.hpp"
#include "ctxseg/trajectory.hpp"
#include "ctxseg/unary.hpp"
