// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace dlp {

// Entry point behind the dantzig_lp binary, separated out so tests can
// drive the command surface in-process. Exit codes: 0 when every solve
// reports optimal, 2 when any hits an iteration limit, 1 on usage or data
// errors.
int cli_main(int argc, const char* const* argv);

}  // namespace dlp
