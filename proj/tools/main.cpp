#include "sparseconf/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    sparseconf::RunConfig cfg;
    int code = 0;
    if (!sparseconf::parse_args(argc, argv, cfg, code))
        return code;
    return sparseconf::run(cfg, std::cerr);
}
