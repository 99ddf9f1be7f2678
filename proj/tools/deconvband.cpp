#include "deconvband/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
  return deconvband::cli::run(argc, argv, std::cout, std::cerr);
}
