#include <string>
#include <vector>

#include "tropkraus/cli.hpp"

int main(int argc, char** argv) { return tropkraus::cli::run(std::vector<std::string>(argv, argv + argc)); }
