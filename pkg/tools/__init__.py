# Tools Package: config, logging, RNG streams, CSV I/O
