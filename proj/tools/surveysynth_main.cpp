#include <iostream>

#include "surveysynth/cli.hpp"

int main(int argc, char** argv) {
    return surveysynth::dispatch(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
