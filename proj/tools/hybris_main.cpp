#include "hybris/cli.hpp"

int main(int argc, char** argv) {
    return hybris::cli_main(std::vector<std::string>(argv + 1, argv + argc));
}
