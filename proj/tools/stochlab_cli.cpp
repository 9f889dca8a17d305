#include <cstdio>

int main() {
    std::puts("stochlab: harness not wired yet");
    return 0;
}
