// SPDX-License-Identifier: Apache-2.0
#include "clab/cli/cli.hpp"

int main(int argc, char** argv)
{
    return clab::cli::run(argc, argv);
}
