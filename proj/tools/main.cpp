#include "saddleflow/cli.hpp"

int main(int argc, char** argv) {
  return saddleflow::cli::run_main(argc, argv);
}
