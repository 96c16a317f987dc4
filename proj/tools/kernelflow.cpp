#include "kernelflow/cli/commands.hpp"

#include <cstdlib>
#include <iostream>

int main(int argc, char** argv) {
    kernelflow::cli::Environment env;
    if (const char* threads = std::getenv("KERNELFLOW_THREADS")) env.threads = threads;
    return kernelflow::cli::run({argv + 1, argv + argc}, std::cout, std::cerr, env);
}
