// Regenerates the bundled scenario JSON files from the library fixtures so
// the files and the in-code factories cannot drift apart.
#include <spherecir/scenario_io.hpp>

#include <iostream>

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: make_scenarios <output dir>\n";
        return 2;
    }
    std::string dir = argv[1];
    using namespace spherecir;
    for (const Scenario& sc : {desk_internal_scenario(), desk_external_scenario(),
                               full_internal_scenario()})
        write_text_file(dir + "/" + sc.name + ".json",
                        scenario_to_json(sc).dump(2) + "\n");
    return 0;
}
