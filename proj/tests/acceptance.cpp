#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <sys/wait.h>

#include "infsup_lab/selftest.hpp"

using namespace infsup_lab;

namespace {

selftest::CriterionResult criterion_14(const std::string& cli)
{
    selftest::CriterionResult r;
    r.id = 14;
    r.title = "`infsup-lab selftest` runs criteria 1-13 and exits 0";
    if (cli.empty()) {
        r.detail = "no --cli path given";
        return r;
    }
    const std::string cmd = "\"" + cli + "\" selftest > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.pass = code == 0;
    r.detail = "exit code " + std::to_string(code);
    return r;
}

} // namespace

int main(int argc, char** argv)
{
    std::string cli, expect;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--cli" && i + 1 < argc) cli = argv[++i];
        else if (a == "--expect-fail" && i + 1 < argc) expect = argv[++i];
        else {
            std::cerr << "usage: acceptance [--cli PATH] [--expect-fail IDS]\n";
            return 2;
        }
    }
    std::vector<selftest::CriterionResult> results;
    int id = 1;
    for (const auto& c : selftest::all_criteria()) {
        results.push_back(selftest::run(c, id++));
        std::cout << selftest::format_line(results.back()) << std::endl;
    }
    results.push_back(selftest::run([&] { return criterion_14(cli); }, 14));
    std::cout << selftest::format_line(results.back()) << std::endl;

    const auto failed = selftest::failed_ids(results);
    std::printf("%zu/%zu criteria passed\n", results.size() - failed.size(), results.size());
    if (expect.empty()) return failed.empty() ? 0 : 1;
    const bool match = failed == selftest::parse_id_list(expect);
    std::printf("expected failures {%s}: %s\n", expect.c_str(), match ? "matched" : "NOT matched");
    return match ? 0 : 1;
}
