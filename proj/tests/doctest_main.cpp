#define DOCTEST_CONFIG_IMPLEMENT

#include <doctest.h>

#include "runner/pipeline.hpp"

int main(int argc, char** argv) {
    setenv("CAA_LOG", "0", 0);
    caa::runner::apply_threads(0);
    doctest::Context context;
    context.applyCommandLine(argc, argv);
    return context.run();
}
