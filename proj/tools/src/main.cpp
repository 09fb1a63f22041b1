// SPDX-License-Identifier: Apache-2.0
#include "tvtr/commands.hpp"

int main(int argc, char** argv) { return tvtr::cli::run_cli(argc, argv); }
