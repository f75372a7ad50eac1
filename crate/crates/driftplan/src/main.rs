fn main() -> std::process::ExitCode {
    driftplan::cli::main()
}
