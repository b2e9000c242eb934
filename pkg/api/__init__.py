# Module API pour Syndromo : jeu de données publié et convertisseurs texte → OSD
