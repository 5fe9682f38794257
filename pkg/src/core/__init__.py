# Core components: errors, settings, validation, manifests and record I/O