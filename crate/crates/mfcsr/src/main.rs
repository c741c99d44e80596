fn main() -> std::process::ExitCode {
    mfcsr::cli::main()
}
