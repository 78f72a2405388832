// Training loops, evaluation, sweeps, enumerative training, probes.
