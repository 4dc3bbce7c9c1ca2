# SPDX-License-Identifier: Apache-2.0
#
# afrelay - block Markov amplify-and-forward relaying toolkit
# Copyright (C) 2026 The afrelay authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ------------------------------------------------------------------------
"""Block Markov amplify-and-forward relaying toolkit."""

from ._afrelay import (
    ConfigError,
    DegenerateInputError,
    DomainError,
    NumericError,
    PreconditionError,
    cell_center,
    cutset_capacity,
    cutset_sum_upper,
    default_scaling,
    gamma_two_hop,
    gammas_three_hop,
    gap_table,
    greedy_allocate,
    has_distinct_eigs,
    hop_decompose,
    is_full_rank,
    log_pdf_matrix,
    map_three_hop,
    map_two_hop,
    quantize,
    rate_three_hop,
    rate_two_hop,
    region_basic,
    region_contains,
    region_general,
    run_cli,
    sample_hop_matrix,
    simulate,
    sinr_three_hop,
    sinr_two_hop,
    solve_c,
    solve_c_bisection,
    waterfill,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
