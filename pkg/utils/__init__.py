# Module utils pour Syndromo : modèle OSD, validation, évaluation, rendu, corpus, comparaison
