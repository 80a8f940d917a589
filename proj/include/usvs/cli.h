// include/usvs/cli.h

// Copyright 2026  The usvs Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef USVS_CLI_H_
#define USVS_CLI_H_

#include <string>
#include <vector>

namespace usvs {

/// Entry point of the usvs tool. Returns 0 on success, 1 on usage errors and
/// 2 on runtime errors.
int Dispatch(const std::vector<std::string> &args);
int Dispatch(int argc, char **argv);

/// Version string baked in at build time.
const char *Version();

}  // namespace usvs

#endif  // USVS_CLI_H_
