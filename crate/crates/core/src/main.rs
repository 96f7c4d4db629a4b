fn main() -> std::process::ExitCode {
    mimo_se::cli::main()
}
