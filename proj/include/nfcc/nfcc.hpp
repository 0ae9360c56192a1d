// SPDX-License-Identifier: Apache-2.0
//
// nfcc: near-field channel charting and pilot allocation for XL-MIMO
// Copyright (C) 2026 The nfcc authors
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

// Umbrella header.
#ifndef NFCC_NFCC_HPP
#define NFCC_NFCC_HPP

#include "types.hpp"
#include "scenario.hpp"
#include "channel.hpp"
#include "codebook.hpp"
#include "spectrum.hpp"
#include "charting.hpp"
#include "allocation.hpp"
#include "evaluation.hpp"
#include "experiment.hpp"

#endif
