// Copyright 2026 The Hypertune Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HYPERTUNE_CLI_HPP_
#define HYPERTUNE_CLI_HPP_

namespace hypertune {

// Entry point behind main(). Subcommands: run, report, bench, spaces.
// Exit codes: 0 success, 1 I/O or benchmark-property failure, 2 configuration
// error, 3 generation collapse.
int run_cli(int argc, const char* const* argv);

}  // namespace hypertune

#endif  // HYPERTUNE_CLI_HPP_
