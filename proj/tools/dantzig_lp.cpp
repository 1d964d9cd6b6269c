// SPDX-License-Identifier: Apache-2.0

#include "dlp/cli.hpp"

int main(int argc, char** argv) { return dlp::cli_main(argc, argv); }
