fn main() -> std::process::ExitCode {
    blc_lab::cli::main_entry()
}
