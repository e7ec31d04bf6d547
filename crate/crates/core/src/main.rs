fn main() -> std::process::ExitCode {
    finrank::cli::main()
}
