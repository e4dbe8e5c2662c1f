// Placeholder main; the full command set is wired up in a later pass.
int main() { return 0; }
