fn main() -> std::process::ExitCode {
    parasite_branching::harness::cli::main()
}
