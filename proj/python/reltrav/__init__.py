# Copyright 2026 The reltrav Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ==============================================================================
"""Python bindings for the reltrav C++ toolkit."""

from ._reltrav import (
    ReltravError,
    discretize,
    generate_pair_tasks,
    hdr,
    label_accounting,
    min_pair_distance,
    pair_loss,
    predict,
    run_cli,
    seg_metrics,
    synth_dataset,
    tier_cutoffs,
    train,
    write_synth,
)

__all__ = [
    "ReltravError",
    "discretize",
    "generate_pair_tasks",
    "hdr",
    "label_accounting",
    "min_pair_distance",
    "pair_loss",
    "predict",
    "run_cli",
    "seg_metrics",
    "synth_dataset",
    "tier_cutoffs",
    "train",
    "write_synth",
]
